import sys

from rds_ss.cli import main

sys.exit(main())
