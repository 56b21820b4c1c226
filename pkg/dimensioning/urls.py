"""
Dimensioning URL configuration.

All endpoints are prefixed with /api/dimension/ (set in root urls.py).
"""

from django.urls import path

from dimensioning import views

urlpatterns = [
    path('', views.DimensionView.as_view(), name='dimension'),
    path('lte/', views.LteDimensionView.as_view(), name='dimension-lte'),
]
