import logging

logger = logging.getLogger(__name__)


def configure_logging(level: int = logging.INFO, app_name: str = "pixel_eql") -> None:
    """
    Configure logging for the application.

    - Only the given app's logger logs at the requested level.
    - Everything else defaults to WARNING.
    - HTTP and tensor libraries are kept quiet.

    Args:
        level: The log level for the app (e.g. logging.DEBUG, logging.INFO).
        app_name: The name of the application's logger.
    """
    # Clear existing handlers to avoid duplicate logs
    root_logger = logging.getLogger()
    for h in root_logger.handlers[:]:
        root_logger.removeHandler(h)

    handler = logging.StreamHandler()
    formatter = logging.Formatter(
        fmt="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
    )
    handler.setFormatter(formatter)

    root_logger.addHandler(handler)
    root_logger.setLevel(logging.WARNING)

    app_logger = logging.getLogger(app_name)
    app_logger.setLevel(level)

    for noisy in ["httpx", "httpcore", "openai", "urllib3", "torch", "asyncio"]:
        logging.getLogger(noisy).setLevel(logging.WARNING)
