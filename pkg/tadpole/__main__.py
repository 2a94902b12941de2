import sys

from .app import cli

sys.exit(cli())
