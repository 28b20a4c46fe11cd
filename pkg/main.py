"""Main CLI entry point: `python main.py certify --m 4 --n 4`."""

from toroidal_matchings.cli import cli

if __name__ == "__main__":
    cli()
