from django.apps import AppConfig


class DimensioningConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dimensioning'
    verbose_name = 'Dimensioning'
