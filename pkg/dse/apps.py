from django.apps import AppConfig


class DseConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dse'
    verbose_name = 'Design-Space Exploration'
