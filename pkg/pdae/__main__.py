import sys

from pdae.main import main

sys.exit(main())
