"""Entry point for running meanscope as a module."""

from meanscope.cli import run

if __name__ == "__main__":
    run()
