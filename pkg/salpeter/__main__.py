import sys

from salpeter.cli import main

sys.exit(main())
