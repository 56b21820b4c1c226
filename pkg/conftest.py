import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'treemimo.settings')
django.setup()

# Same environment the Django test runner installs (testserver host, locmem email, ...).
from django.test.utils import setup_test_environment  # noqa: E402

setup_test_environment()
