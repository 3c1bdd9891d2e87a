from abc import ABC, abstractmethod
from typing import Any, Dict, List


class IRunExecutor(ABC):
    """Executes experiment-run payloads and returns their result dicts in payload order."""

    @abstractmethod
    def run_all(self, payloads: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        pass
