import sys

from georisk.cli import main

sys.exit(main())
