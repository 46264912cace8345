import sys

from splitmac.cli import main

sys.exit(main())
