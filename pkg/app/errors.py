class ToolError(Exception):
    """
    Базовая ошибка инструмента: сообщение для stderr и код выхода CLI
    """
    exit_code: int = 1

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ValidationFailed(ToolError):
    """Некорректные входные данные или нарушенное предусловие операции"""
    exit_code = 2


class LimitExceeded(ToolError):
    """Превышен настроенный предел ресурсов (число лучей, строк, размер перебора)"""
    exit_code = 3
