import sys

from r2d2.cli.main import main

sys.exit(main())
