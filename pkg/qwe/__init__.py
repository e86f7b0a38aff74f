import logging

from config import Config


class Settings(dict):
    """Solver settings, loaded from a config class like Flask's app.config."""

    def from_object(self, obj):
        for key in dir(obj):
            if key.isupper():
                self[key] = getattr(obj, key)

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError:
            raise AttributeError(name)


def create_app(config_class=Config, **overrides):
    settings = Settings()
    settings.from_object(config_class)

    # Command-line flags win over the config class; None means "not given"
    for key, value in overrides.items():
        if value is not None:
            settings[key.upper()] = value

    logging.basicConfig(
        level=getattr(logging, str(settings['LOG_LEVEL']).upper(), logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    logging.getLogger('qwe').setLevel(str(settings['LOG_LEVEL']).upper())

    return settings
