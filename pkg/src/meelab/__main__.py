import sys

from meelab.cli import main

sys.exit(main())
