# -*- coding: utf-8 -*-
import sys

from releasetrends.cli import main

sys.exit(main())
