# config/settings.py
import os
from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    return int(raw) if raw not in (None, "") else default


class Settings:
    # App
    TITLE = "Phoenix vault simulator"
    VERSION = "1.0.0"
    LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")

    # Arithmetic: "fixed" rejects overflowing request sums, "legacy" wraps them
    DEFAULT_MODE = os.getenv("DEFAULT_MODE", "fixed")

    # Well-known identities
    VAULT_ADDRESS = os.getenv("VAULT_ADDRESS", "0x" + "ff" * 20)
    FAUCET_ADDRESS = os.getenv("FAUCET_ADDRESS", "0x" + "fa" * 20)

    # Ledger
    MAX_LEDGER_SIZE = _int_env("MAX_LEDGER_SIZE", 64)

    # Bounded exploration
    EXPLORE_ADDRESSES = _int_env("EXPLORE_ADDRESSES", 4)
    EXPLORE_AMOUNT_CAP = _int_env("EXPLORE_AMOUNT_CAP", 3)
    EXPLORE_DEPTH = _int_env("EXPLORE_DEPTH", 6)
    EXPLORE_DELAY = _int_env("EXPLORE_DELAY", 2)
    EXPLORE_MAX_LEDGER_SIZE = _int_env("EXPLORE_MAX_LEDGER_SIZE", 4)
    EXPLORE_INITIAL_FUNDS = _int_env("EXPLORE_INITIAL_FUNDS", 3)
    EXPLORE_STATE_BUDGET = _int_env("EXPLORE_STATE_BUDGET", 2_000_000)
    EXPLORE_WORKERS = _int_env("EXPLORE_WORKERS", 1)

    # Scenarios
    SCENARIO_DELAY = _int_env("SCENARIO_DELAY", 10)
    LOCKDOWN_HORIZON = _int_env("LOCKDOWN_HORIZON", 1_000_000)  # blocks past "now"
    TRACE_DIR = os.getenv("TRACE_DIR", "./traces")


settings = Settings()
