import sys

from superosc import create_cli, run

cli = create_cli()

if __name__ == "__main__":
    sys.exit(run(cli=cli))
