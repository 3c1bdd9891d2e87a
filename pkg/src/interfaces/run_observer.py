from abc import ABC, abstractmethod
from typing import Any, Dict


class IRunObserver(ABC):
    """
    Receives training-run lifecycle events.

    The trainer only talks to this interface; the manifest writer and the
    database registry are interchangeable implementations.
    """

    @abstractmethod
    def on_run_start(self, manifest: Any) -> None:
        pass

    @abstractmethod
    def on_epoch_end(self, manifest: Any, record: Any) -> None:
        pass

    @abstractmethod
    def on_event(self, manifest: Any, event: Dict[str, Any]) -> None:
        pass

    @abstractmethod
    def on_run_end(self, manifest: Any) -> None:
        pass
