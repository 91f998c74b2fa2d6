# byzfed/__main__.py
from .io.cli import main

if __name__ == "__main__":
    main()
