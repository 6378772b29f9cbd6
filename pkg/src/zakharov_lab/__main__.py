import sys

from zakharov_lab.cli import main

sys.exit(main())
