"""HTTP sidecar serving the model endpoints the attack pipeline consumes."""

from .app import create_app
from .config import ServerConfig

__all__ = ["create_app", "ServerConfig"]
__version__ = "0.1.0"
