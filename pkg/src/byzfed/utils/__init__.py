# byzfed/utils/__init__.py
