import hashlib
import logging
import os
import tempfile
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

import redis
import ujson

from app.config import Settings, settings

logger = logging.getLogger(__name__)


class NullBackend:
    '''Бэкенд без хранения: каждый запрос: промах'''

    def read(self, key: str) -> Optional[str]:
        return None

    def write(self, key: str, data: str) -> None:
        return None

    def delete(self, key: str) -> None:
        return None

    def clear(self) -> None:
        return None

    @contextmanager
    def lock(self, key: str) -> Iterator[None]:
        yield


class FileBackend:
    """
    Один JSON-файл на ключ в каталоге кеша; запись через временный файл и
    атомарную замену, доступ к ключу под отдельной блокировкой
    """

    def __init__(self, directory: str):
        self.directory = Path(directory)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def read(self, key: str) -> Optional[str]:
        path = self._path(key)
        if not path.exists():
            return None
        return path.read_text(encoding="utf-8")

    def write(self, key: str, data: str) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(data)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def delete(self, key: str) -> None:
        self._path(key).unlink(missing_ok=True)

    def clear(self) -> None:
        if not self.directory.exists():
            return
        for path in self.directory.glob("*.json"):
            path.unlink(missing_ok=True)

    @contextmanager
    def lock(self, key: str) -> Iterator[None]:
        with self._guard:
            key_lock = self._locks.setdefault(key, threading.Lock())
        with key_lock:
            yield


class RedisBackend:
    """
    Хранение в Redis с необязательным временем жизни записей
    """

    def __init__(self, config: Settings, ttl: Optional[int] = None):
        self.redis_client = redis.Redis(
            host=config.REDIS_HOST,
            port=config.REDIS_PORT,
            db=config.REDIS_DB,
            password=config.REDIS_PASSWORD,
            decode_responses=True,
        )
        self.ttl = ttl

    @staticmethod
    def _name(key: str) -> str:
        return f"rays:{key}"

    def read(self, key: str) -> Optional[str]:
        return self.redis_client.get(self._name(key))

    def write(self, key: str, data: str) -> None:
        if self.ttl:
            self.redis_client.setex(self._name(key), self.ttl, data)
        else:
            self.redis_client.set(self._name(key), data)

    def delete(self, key: str) -> None:
        self.redis_client.delete(self._name(key))

    def clear(self) -> None:
        for name in self.redis_client.scan_iter(match=self._name("*")):
            self.redis_client.delete(name)

    @contextmanager
    def lock(self, key: str) -> Iterator[None]:
        with self.redis_client.lock(f"lock:{self._name(key)}", timeout=600):
            yield


class RayCache:
    """
    Кеш V-представлений конусов, адресуемый хешем канонического H-представления
    """

    def __init__(self, backend=None, salt: Optional[str] = None):
        self.backend = backend or NullBackend()
        self.salt = salt or settings.CACHE_SALT

    def key_for(self, hrep: Sequence[Sequence[int]], dim: int) -> str:
        '''
        Ключ кеша: SHA-256 от соли версии и канонического JSON H-представления

        Строки сортируются и дедуплицируются, поэтому ключ не зависит от порядка
        неравенств.
        '''
        rows = sorted({tuple(int(x) for x in row) for row in hrep})
        payload = ujson.dumps({"dim": dim, "rows": [list(row) for row in rows]}, sort_keys=True)
        return hashlib.sha256(f"{self.salt}\n{payload}".encode("utf-8")).hexdigest()

    def get(self, key: str) -> Optional[Any]:
        '''Данные из кеша или None (промах или нечитаемая запись)'''
        with self.backend.lock(key):
            data = self.backend.read(key)
        if data is None:
            logger.debug("Промах кеша %s", key[:12])
            return None
        try:
            return ujson.loads(data)
        except ValueError:
            logger.warning("Запись кеша %s не является JSON, она будет перезаписана", key[:12])
            return None

    def set(self, key: str, value: Any) -> None:
        with self.backend.lock(key):
            self.backend.write(key, ujson.dumps(value, sort_keys=True, escape_forward_slashes=False))

    def invalidate_all(self) -> None:
        '''Очищает весь кеш'''
        self.backend.clear()

    def invalidate_key(self, key: str) -> None:
        '''Удаляет конкретный ключ из кеша'''
        self.backend.delete(key)


def get_cache(config: Optional[Settings] = None) -> RayCache:
    config = config or settings
    if config.CACHE_BACKEND == "redis":
        backend = RedisBackend(config, ttl=config.CACHE_TTL_SECONDS)
    elif config.CACHE_BACKEND == "file":
        backend = FileBackend(config.CACHE_DIR)
    else:
        backend = NullBackend()
    return RayCache(backend, salt=config.CACHE_SALT)
