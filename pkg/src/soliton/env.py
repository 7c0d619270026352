import logging
import os

import pydantic
from pydantic_settings import BaseSettings


class SolitonConfig(BaseSettings):
    threads: int = pydantic.Field(
        validation_alias="SOLITON_THREADS", default=os.cpu_count() or 1
    )
    log_level: str = pydantic.Field(validation_alias="SOLITON_LOG_LEVEL", default="WARNING")
    fail_fast: bool = pydantic.Field(validation_alias="SOLITON_FAIL_FAST", default=False)

    @pydantic.field_validator("threads")
    @classmethod
    def threads_validate(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"threads must be positive {v}")
        return v

    @pydantic.field_validator("log_level")
    @classmethod
    def log_level_validate(cls, v: str) -> str:
        v = v.upper()
        if not isinstance(logging.getLevelName(v), int):
            raise ValueError(f"log level not recognized {v}")
        return v

    @property
    def is_parallel(self) -> bool:
        return self.threads > 1


app: SolitonConfig = SolitonConfig()
