"""
Dimensioning Cache Utilities — cached reports for the API.

Reports are pure functions of their inputs, so entries never need
invalidation; they only expire.
"""

import hashlib
import json
import logging

from django.conf import settings
from django.core.cache import cache

logger = logging.getLogger(__name__)

# ── TTL Constants (seconds) ─────────────────────────────────────────────────

REPORT_TTL = getattr(settings, 'MIMO_REPORT_CACHE_TTL', 3600)


# ── Key Generators ──────────────────────────────────────────────────────────

def _hash_params(params: dict) -> str:
    """Create a short deterministic hash from request parameters."""
    stable = json.dumps(sorted(params.items()), default=str)
    return hashlib.md5(stable.encode()).hexdigest()[:12]


def report_key(params_mapping: dict, options: dict) -> str:
    """Cache key for a dimensioning report."""
    h = _hash_params({**params_mapping, **{f'opt:{k}': v for k, v in options.items()}})
    return f'dimension_report:{h}'


def get_report(key: str):
    data = cache.get(key)
    if data is not None:
        logger.debug('Report cache hit %s', key)
    return data


def store_report(key: str, data: dict):
    cache.set(key, data, REPORT_TTL)
