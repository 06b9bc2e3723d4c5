from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal, Optional


class Settings(BaseSettings):
    """
    Настройки инструмента, загружаемые из переменных окружения (префикс TERNARY_)
    """
    # Настройки кеша лучей
    CACHE_BACKEND: Literal["file", "redis", "none"] = "file"
    CACHE_DIR: str = ".ternary_cache"
    CACHE_TTL_SECONDS: Optional[int] = None

    # Настройки Redis
    REDIS_HOST: str = "localhost"
    REDIS_PORT: int = 6379
    REDIS_DB: int = 0
    REDIS_PASSWORD: Optional[str] = None

    # Ограничения вычислений
    MAX_RAYS: int = 200_000
    MAX_ROWS: int = 20_000
    CYCLE_BOUND: int = 4
    KERNEL_ENUM_LIMIT: int = 20

    # Вывод и логирование
    LOG_LEVEL: str = "WARNING"
    DEFAULT_FORMAT: Literal["json", "table", "off"] = "json"

    # Другие настройки
    TOOL_VERSION: str = "1.0.0"
    TOOL_TITLE: str = "Ternary Polytope Toolkit"

    model_config = SettingsConfigDict(
        env_prefix="TERNARY_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @property
    def CACHE_SALT(self) -> str:
        """
        Соль ключа кеша: записи разных версий инструмента никогда не смешиваются
        """
        return f"{self.TOOL_TITLE}:{self.TOOL_VERSION}"


# Создаем экземпляр настроек
settings = Settings()
