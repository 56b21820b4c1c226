"""
Django settings for treemimo project.

Distributed massive-MIMO baseband toolkit: dimensioning, scheduling,
simulation and design-space exploration for tree-connected antenna nodes.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv
load_dotenv()


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'treemimo-dev-only-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('DEBUG', 'True').lower() in ('true', '1', 'yes')

ALLOWED_HOSTS = [
    'localhost',
    '127.0.0.1',
    '[::1]',
]

EXTRA_ALLOWED_HOST = os.environ.get('ALLOWED_HOST')
if EXTRA_ALLOWED_HOST:
    ALLOWED_HOSTS.append(EXTRA_ALLOWED_HOST)


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'django.contrib.staticfiles',

    # Third-party
    'rest_framework',
    'drf_spectacular',

    # Local apps
    'system',
    'baseband',
    'dimensioning',
    'scheduler',
    'simulator',
    'dse',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'treemimo.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
            ],
        },
    },
]

WSGI_APPLICATION = 'treemimo.wsgi.application'


# Database
# No app stores rows; the engine only exists so that Django management
# commands and the test runner have a configured default connection.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('DB_NAME', str(BASE_DIR / 'db.sqlite3')),
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Static files (CSS, JavaScript, Images)
# https://docs.djangoproject.com/en/5.2/howto/static-files/

STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# =============================================================================
# REST FRAMEWORK CONFIGURATION
# =============================================================================

REST_FRAMEWORK = {
    # The API is a stateless calculator: no sessions, no users.
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_THROTTLE_CLASSES': [
        'rest_framework.throttling.AnonRateThrottle',
    ],
    'DEFAULT_THROTTLE_RATES': {
        'anon': os.environ.get('API_ANON_RATE', '600/hour'),
    },
    'DEFAULT_RENDERER_CLASSES': (
        ['rest_framework.renderers.JSONRenderer', 'rest_framework.renderers.BrowsableAPIRenderer']
        if DEBUG else
        ['rest_framework.renderers.JSONRenderer']
    ),
    'DEFAULT_SCHEMA_CLASS': 'drf_spectacular.openapi.AutoSchema',
}


# =============================================================================
# DRF-SPECTACULAR (SWAGGER/OPENAPI) CONFIGURATION
# =============================================================================

SPECTACULAR_SETTINGS = {
    'TITLE': 'treemimo API',
    'DESCRIPTION': 'Dimensioning and feasibility reports for tree-connected massive MIMO basebands',
    'VERSION': '1.0.0',
    'SERVE_INCLUDE_SCHEMA': False,
    'COMPONENT_SPLIT_REQUEST': True,
}


# =============================================================================
# CACHING CONFIGURATION
# =============================================================================

REDIS_URL = os.environ.get('REDIS_URL', '')

if REDIS_URL:
    CACHES = {
        'default': {
            'BACKEND': 'django_redis.cache.RedisCache',
            'LOCATION': REDIS_URL,
            'OPTIONS': {
                'CLIENT_CLASS': 'django_redis.client.DefaultClient',
                'SOCKET_CONNECT_TIMEOUT': 5,
                'SOCKET_TIMEOUT': 5,
                'RETRY_ON_TIMEOUT': True,
                'IGNORE_EXCEPTIONS': True,  # Graceful degradation
            },
            'KEY_PREFIX': 'treemimo',
            'TIMEOUT': 300,
        }
    }
else:
    # Fallback: in-memory cache when Redis is not configured
    CACHES = {
        'default': {
            'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
            'LOCATION': 'treemimo-cache',
            'TIMEOUT': 300,
        }
    }


# =============================================================================
# LOGGING
# =============================================================================

MIMO_LOG_LEVEL = os.environ.get('MIMO_LOG_LEVEL', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': MIMO_LOG_LEVEL, 'propagate': False}
        for app in ('system', 'baseband', 'dimensioning', 'scheduler', 'simulator', 'dse')
    },
}


# =============================================================================
# TOOLKIT CONFIGURATION
# =============================================================================

# Default directory for CLI artifacts when --out is not given
MIMO_OUTPUT_DIR = os.environ.get('MIMO_OUTPUT_DIR', str(BASE_DIR / 'runs'))

# Thread pool size for design-space exploration (0 = evaluate inline)
MIMO_DSE_WORKERS = int(os.environ.get('MIMO_DSE_WORKERS', '4'))

# Oracle tolerances used by the simulator verdicts
MIMO_ORACLE_RTOL = float(os.environ.get('MIMO_ORACLE_RTOL', '1e-9'))
MIMO_CB_ATOL_PER_NODE = float(os.environ.get('MIMO_CB_ATOL_PER_NODE', '1e-12'))

# TTL of cached dimensioning reports served by the API (seconds)
MIMO_REPORT_CACHE_TTL = int(os.environ.get('MIMO_REPORT_CACHE_TTL', '3600'))

# Terminal count at which T_inv is anchored for cubic scaling.
# Empty = anchor at the K of the parameter set being scaled.
MIMO_CUBIC_TINV_ANCHOR_K = os.environ.get('MIMO_CUBIC_TINV_ANCHOR_K', '')
