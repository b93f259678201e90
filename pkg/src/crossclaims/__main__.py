import sys

from crossclaims.cli import main

sys.exit(main())
