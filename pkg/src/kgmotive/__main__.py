import sys

from kgmotive.cli import main

sys.exit(main())
