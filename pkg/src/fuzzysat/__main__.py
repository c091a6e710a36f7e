import sys

from fuzzysat.cli import main

sys.exit(main())
