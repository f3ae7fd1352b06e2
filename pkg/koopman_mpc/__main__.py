import sys

from koopman_mpc.main import main

sys.exit(main())
