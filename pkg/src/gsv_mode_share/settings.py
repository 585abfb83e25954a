"""
Settings management for GSV Mode Share using dotenv.
"""
import os
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Street-view metadata API key (live client only)
SV_API_KEY: Optional[str] = os.environ.get("SV_API_KEY")

# Logging
LOG_LEVEL: str = os.environ.get("GSV_LOG_LEVEL", "INFO").upper()

# Default worker pool size for per-city fan-out
WORKERS: int = int(os.environ.get("GSV_WORKERS", "4"))

# Debug mode - when True, tracebacks are shown for stage failures
DEBUG: bool = os.environ.get("DEBUG", "False").lower() == "true"
