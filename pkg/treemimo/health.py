import numpy as np
from django.http import JsonResponse
from django.core.cache import cache

from baseband.services.fft_service import fft_dit


def health_check(request):
    """
    Health check endpoint for monitoring.
    Checks the cache backend and runs a tiny FFT self-test.
    """
    health_status = {
        "status": "healthy",
        "kernels": "unknown",
        "cache": "unknown"
    }

    # Kernel check: a DC input must land entirely in bin 0
    try:
        spectrum = fft_dit(np.ones(8, dtype=complex))
        expected = np.zeros(8, dtype=complex)
        expected[0] = 8
        if np.allclose(spectrum, expected):
            health_status["kernels"] = "ok"
        else:
            health_status["kernels"] = "mismatch"
            health_status["status"] = "unhealthy"
    except Exception as e:
        health_status["kernels"] = f"error: {str(e)}"
        health_status["status"] = "unhealthy"

    # Cache Check
    try:
        cache.set("_health_check", 1, timeout=5)
        val = cache.get("_health_check")
        if val == 1:
            health_status["cache"] = "connected"
        else:
            health_status["cache"] = "degraded"
    except Exception as e:
        health_status["cache"] = f"error: {str(e)}"

    code = 200 if health_status["status"] == "healthy" else 503
    return JsonResponse(health_status, status=code)
