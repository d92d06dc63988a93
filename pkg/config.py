from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal, Optional


class Settings(BaseSettings):
    # Execution settings
    QHL_THREADS: int = 1
    QHL_OUTPUT_DIR: str = "results"

    # Logging settings
    QHL_LOG_LEVEL: str = "INFO"
    QHL_LOG_FORMAT: Literal["text", "json"] = "text"
    QHL_LOG_FILE: Optional[str] = None

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
