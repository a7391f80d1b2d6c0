from .routes import Route, best_path
from .speaker import Fabric, Speaker
from .wire import BgpPeer, WireSpeaker

__all__ = ["Route", "best_path", "Speaker", "Fabric", "BgpPeer", "WireSpeaker"]
