# src/utils/logger.py

from datetime import datetime
from typing import Optional


class RunLogger:
    """
    Logger for toolkit operations.
    Records every parse, build, training and reporting step with timestamps
    and details.
    """

    def __init__(self, echo: bool = True):
        """
        Initialize the logger.

        Args:
            echo: Whether each entry is also printed to the console
        """
        self.logs = []
        self.echo = echo

    def log_operation(self, operation: str, target: str,
                      success: bool, details: Optional[str] = None):
        """
        Log an operation.

        Args:
            operation: Type of operation (PARSE, TRAIN_EPOCH, VERDICT, etc.)
            target: What the operation acted on (graph name, file path, model)
            success: Whether operation succeeded
            details: Additional details about the operation
        """
        timestamp = datetime.now()
        status = "SUCCESS" if success else "FAILED"
        log_entry = f"[{timestamp}] {operation} {target} - {status}"
        if details:
            log_entry += f" ({details})"

        self.logs.append(log_entry)
        if self.echo:
            print(log_entry)

    def get_logs(self) -> list[str]:
        """Get all logged operations."""
        return self.logs

    def failures(self) -> list[str]:
        return [entry for entry in self.logs if " - FAILED" in entry]
