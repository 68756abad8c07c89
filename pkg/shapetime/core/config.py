from __future__ import annotations

import os
from functools import lru_cache
from typing import Literal

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class BaseAppSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=os.getenv("ENV_FILE", ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    app_env: Literal["dev", "prod"] = Field(default="dev", validation_alias="APP_ENV")
    app_name: str = Field(default="shapetime", validation_alias="APP_NAME")

    log_level: str = Field(default="INFO", validation_alias="LOG_LEVEL")
    log_json: bool = Field(default=True, validation_alias="LOG_JSON")

    threads: int = Field(default=1, validation_alias="THREADS")
    out_dir: str = Field(default="runs", validation_alias="OUT_DIR")

    default_gamma: float = Field(default=1e-2, validation_alias="DEFAULT_GAMMA")
    default_alpha: float = Field(default=0.5, validation_alias="DEFAULT_ALPHA")
    quality_floor: float = Field(default=1e-6, validation_alias="QUALITY_FLOOR")

    @model_validator(mode="after")
    def _validate_ranges(self) -> "BaseAppSettings":
        if self.threads <= 0:
            raise ValueError("THREADS must be positive")
        if self.default_gamma <= 0:
            raise ValueError("DEFAULT_GAMMA must be positive")
        if not (0.0 <= self.default_alpha <= 1.0):
            raise ValueError("DEFAULT_ALPHA must be within [0, 1]")
        if self.quality_floor <= 0:
            raise ValueError("QUALITY_FLOOR must be positive")
        return self


class DevSettings(BaseAppSettings):
    log_json: bool = Field(default=False, validation_alias="LOG_JSON")


class ProdSettings(BaseAppSettings):
    log_json: bool = Field(default=True, validation_alias="LOG_JSON")


Settings = BaseAppSettings


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    env = (os.getenv("APP_ENV") or "dev").strip().lower()
    if env == "prod":
        return ProdSettings()
    return DevSettings()
