import sys

from shapetime.cli import main

sys.exit(main())
