"""
Structured logging and fit audit trail for expofit

JSON log records, an optional rotating log file, and an in-memory history of
fit events (command, input digest, verdict, error, timing, seed). Console
records go to stderr so reports on stdout stay machine readable.
"""

import json
import logging
import logging.handlers
import sys
import threading
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from ..settings import settings


class EventType(Enum):
    """Types of events that can be logged"""

    FIT = "FIT"
    CLASSIFICATION = "CLASSIFICATION"
    SIMULATION = "SIMULATION"
    FALLBACK = "FALLBACK"
    CONFIGURATION_CHANGE = "CONFIGURATION_CHANGE"
    SYSTEM_EVENT = "SYSTEM_EVENT"


@dataclass
class FitEvent:
    """Structured record of one command run"""

    timestamp: datetime
    event_type: EventType
    level: int
    message: str
    command: Optional[str] = None
    digest: Optional[str] = None
    taxonomy: Optional[str] = None
    error: Optional[float] = None
    elapsed: Optional[float] = None
    seed: Optional[int] = None
    session_id: Optional[str] = None
    metadata: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization"""
        data = asdict(self)
        data["timestamp"] = self.timestamp.isoformat()
        data["event_type"] = self.event_type.value
        data["level"] = logging.getLevelName(self.level)
        return data


class StructuredFormatter(logging.Formatter):
    """Formats records as one JSON object per line"""

    def __init__(self, include_timestamps: bool = True):
        super().__init__()
        self.include_timestamps = include_timestamps

    def format(self, record: logging.LogRecord) -> str:
        log_entry: Dict[str, Any] = {
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        if self.include_timestamps:
            log_entry["timestamp"] = datetime.fromtimestamp(record.created).isoformat()

        for key in ("event_type", "command", "digest", "session_id", "metadata"):
            if hasattr(record, key):
                log_entry[key] = getattr(record, key)

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False, default=str)


class LoggingSystem:
    """
    Logging setup plus a bounded history of fit events.

    Owns the handlers it installs on the root logger and removes them in
    cleanup(), so tests and repeated CLI invocations do not stack handlers.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        self.level = str(self.config.get("level", settings.logging.level)).upper()
        self.file_logging = bool(self.config.get("file_logging", settings.logging.file_logging))
        self.log_directory = Path(self.config.get("log_directory", settings.logging.log_directory))
        self.include_timestamps = bool(
            self.config.get("include_timestamps", settings.logging.include_timestamps)
        )

        self._handlers: List[logging.Handler] = []
        self._lock = threading.Lock()
        self._current_session_id: Optional[str] = None
        self._session_start_time: Optional[datetime] = None
        self._fit_history: List[FitEvent] = []
        self._max_history_size = 1000

        self._setup_application_logging()

        self.audit_logger = logging.getLogger("expofit.audit")
        self.logger = logging.getLogger(__name__)
        self.logger.debug("Logging system initialized")

    @property
    def current_session_id(self) -> Optional[str]:
        return self._current_session_id

    def _setup_application_logging(self) -> None:
        formatter = StructuredFormatter(self.include_timestamps)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        self._handlers.append(console_handler)

        if self.file_logging:
            self.log_directory.mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                self.log_directory / "expofit.log",
                maxBytes=settings.logging.max_log_size,
                backupCount=5,
                encoding="utf-8",
            )
            file_handler.setFormatter(formatter)
            self._handlers.append(file_handler)

        root_logger = logging.getLogger()
        root_logger.setLevel(getattr(logging, self.level, logging.WARNING))
        for handler in self._handlers:
            root_logger.addHandler(handler)

    def start_session(self, session_id: Optional[str] = None) -> str:
        with self._lock:
            if session_id is None:
                session_id = f"session_{int(datetime.now().timestamp())}"
            self._current_session_id = session_id
            self._session_start_time = datetime.now()
        self.logger.debug("Logging session started: %s", session_id)
        return session_id

    def end_session(self) -> None:
        if self._current_session_id and self._session_start_time:
            duration = (datetime.now() - self._session_start_time).total_seconds()
            self.logger.debug(
                "Logging session ended: %s",
                self._current_session_id,
                extra={"metadata": {"duration_seconds": duration, "fits": len(self._fit_history)}},
            )
            self._current_session_id = None
            self._session_start_time = None

    def log_fit_event(
        self,
        command: str,
        message: str,
        event_type: EventType = EventType.FIT,
        level: int = logging.INFO,
        digest: Optional[str] = None,
        taxonomy: Optional[str] = None,
        error: Optional[float] = None,
        elapsed: Optional[float] = None,
        seed: Optional[int] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> FitEvent:
        """Record a fit outcome in the history and emit it on the audit logger"""
        event = FitEvent(
            timestamp=datetime.now(),
            event_type=event_type,
            level=level,
            message=message,
            command=command,
            digest=digest,
            taxonomy=taxonomy,
            error=error,
            elapsed=elapsed,
            seed=seed,
            session_id=self._current_session_id,
            metadata=metadata,
        )
        if settings.logging.log_fits:
            self.audit_logger.log(
                level,
                message,
                extra={
                    "event_type": event_type.value,
                    "command": command,
                    "digest": digest,
                    "session_id": self._current_session_id,
                    "metadata": {
                        "taxonomy": taxonomy,
                        "error": error,
                        "elapsed": elapsed,
                        "seed": seed,
                        **(metadata or {}),
                    },
                },
            )
        with self._lock:
            self._fit_history.append(event)
            if len(self._fit_history) > self._max_history_size:
                self._fit_history = self._fit_history[-self._max_history_size :]
        return event

    def get_fit_history(
        self, limit: Optional[int] = None, command: Optional[str] = None
    ) -> List[FitEvent]:
        with self._lock:
            history = self._fit_history.copy()
        if command:
            history = [e for e in history if e.command == command]
        if limit:
            history = history[-limit:]
        return history

    @contextmanager
    def log_context(
        self, context_name: str, metadata: Optional[Dict[str, Any]] = None
    ) -> Iterator[str]:
        """Emit start/end (or error) records with the elapsed time of the block"""
        start_time = datetime.now()
        context_id = f"{context_name}_{int(start_time.timestamp())}"
        self.logger.debug(
            "Context started: %s", context_name,
            extra={"metadata": {"context_id": context_id, **(metadata or {})}},
        )
        try:
            yield context_id
        except Exception as e:
            self.logger.error(
                "Context error: %s", context_name,
                extra={"metadata": {"context_id": context_id, "error": str(e), **(metadata or {})}},
            )
            raise
        finally:
            duration = (datetime.now() - start_time).total_seconds()
            self.logger.debug(
                "Context ended: %s", context_name,
                extra={
                    "metadata": {
                        "context_id": context_id,
                        "duration_seconds": duration,
                        **(metadata or {}),
                    }
                },
            )

    def cleanup(self) -> None:
        """Detach and close the handlers installed by this instance"""
        root_logger = logging.getLogger()
        for handler in self._handlers:
            root_logger.removeHandler(handler)
            handler.close()
        self._handlers.clear()


_logging_system: Optional[LoggingSystem] = None


def get_logging_system() -> LoggingSystem:
    """Get the global logging system instance"""
    global _logging_system
    if _logging_system is None:
        _logging_system = LoggingSystem()
    return _logging_system


def initialize_logging(config: Optional[Dict[str, Any]] = None) -> LoggingSystem:
    """(Re)initialize the global logging system"""
    global _logging_system
    if _logging_system is not None:
        _logging_system.cleanup()
    _logging_system = LoggingSystem(config)
    return _logging_system
