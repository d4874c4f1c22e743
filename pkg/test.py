# -*- coding: utf-8 -*-
import os
import sys

import nose

if __name__ == '__main__':
    sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))
    nose.main(argv=[sys.argv[0], 'tests'] + sys.argv[1:])
