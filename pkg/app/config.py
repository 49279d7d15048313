from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    app_env: str = 'development'
    log_level: str = 'INFO'
    default_seed: int = 2019
    workers: int = 1

    de_samples: int = 10_000
    de_max_iterations: int = 200
    de_target_error: float = 1e-6
    de_tolerance: float = 1e-3

    bp_max_iterations: int = 100
    bp_llr_clamp: float = 30.0
    bp_early_stop: bool = True

    proto_circle_candidates: int = 20
    proto_circle_repeats: int = 10

    max_frame_errors: int = 200

    model_config = SettingsConfigDict(
        env_prefix='PROTOLADDER_',
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=False,
    )


settings = Settings()
