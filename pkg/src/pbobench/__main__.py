import sys

from pbobench.cli import main

sys.exit(main())
