import sys

from margnorm.cli import main

sys.exit(main())
