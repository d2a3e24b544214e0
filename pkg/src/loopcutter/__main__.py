import sys

from loopcutter.cli import main

sys.exit(main())
