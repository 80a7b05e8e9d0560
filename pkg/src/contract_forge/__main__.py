import sys

from contract_forge.cli import main

sys.exit(main())
