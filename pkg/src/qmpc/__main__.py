import sys

from qmpc.cli import main

sys.exit(main())
