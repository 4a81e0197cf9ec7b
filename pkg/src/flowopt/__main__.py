import sys

from flowopt.cli import main

sys.exit(main())
