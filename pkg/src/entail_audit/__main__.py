import sys

from entail_audit.cli import main

sys.exit(main())
