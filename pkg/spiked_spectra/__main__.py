import sys

from spiked_spectra.cli import main

sys.exit(main())
