import sys

from tilekit.cli.main import main

sys.exit(main())
