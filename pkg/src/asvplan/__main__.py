import sys

from asvplan.cli import main

sys.exit(main())
