from django.apps import AppConfig


class BasebandConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'baseband'
    verbose_name = 'Baseband Kernels'
