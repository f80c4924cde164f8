import sys

from hearloop.cli import main

sys.exit(main())
