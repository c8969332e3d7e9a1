"""Metadata for pixel-eql."""

__all__ = [
    "__credits__",
    "__dependencies__",
    "__description__",
    "__keywords__",
    "__readme__",
    "__requires_python__",
    "__status__",
    "__title__",
    "__version__",
]

__title__ = "pixel-eql"
__version__ = "0.1.0"
__keywords__ = ["reinforcement learning", "symbolic regression", "equation learner", "explainability"]
__description__ = "Symbolic policies learned from pixels, with grounded LLM explanations."
__readme__ = "README.md"
__credits__ = [{"name": "pixel-eql contributors"}]
__requires_python__ = ">=3.10"
__status__ = "3 - Alpha"
__dependencies__ = [
    "numpy>=1.26",
    "torch>=2.1",
    "rich>=14.1.0",
    "pydantic>=2.11.9",
    "httpx>=0.28.1",
    "tomli>1.0.0; python_version < '3.11'",
    "tomlkit>=0.13.3",
    "jinja2>=3.1.6",
    "openai>=2.6.1",
    "backoff>=2.2.1",
    "pydantic_settings>1.0.0",
    "python-dotenv>=1.1.1",
]
