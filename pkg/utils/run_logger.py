import os
import json
from datetime import datetime
from typing import Optional, Dict, Any, List


class RunLogger:
    """
    Simple JSONL run-event logger.
    Each line is a JSON object with at least: stage, level, message, timestamp
    (plus piece_id when the event concerns a single piece).
    The log is the audit trail of a run; it carries timestamps, so it is not part of the
    reproducible outputs.
    """

    def __init__(self, log_path: str):
        self.log_path = log_path
        log_dir = os.path.dirname(log_path)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        # Truncate: one log per run
        with open(self.log_path, "w", encoding="utf-8"):
            pass

    def log_event(
        self,
        stage: str,
        message: str,
        level: str = "info",
        piece_id: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
        timestamp: Optional[str] = None,
    ) -> None:
        """Append a single event to the log file as JSON."""
        entry: Dict[str, Any] = {
            "stage": stage,
            "level": level,
            "message": message,
            "timestamp": timestamp or datetime.now().isoformat(),
        }
        if piece_id:
            entry["piece_id"] = piece_id
        if details:
            entry["details"] = details

        with open(self.log_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def warning(self, stage: str, message: str, piece_id: Optional[str] = None) -> None:
        self.log_event(stage, message, level="warning", piece_id=piece_id)

    def error(self, stage: str, message: str, piece_id: Optional[str] = None) -> None:
        self.log_event(stage, message, level="error", piece_id=piece_id)

    def read_events(self) -> List[Dict[str, Any]]:
        """All events logged so far, in order."""
        if not os.path.exists(self.log_path):
            return []
        with open(self.log_path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
