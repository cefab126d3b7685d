import sys

from hidden_action.cli import main

sys.exit(main())
