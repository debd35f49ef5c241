from athermal.cli import main
import sys

sys.exit(main())
