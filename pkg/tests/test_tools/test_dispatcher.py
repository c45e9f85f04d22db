import enum

import pytest

from diskbio.tools import Dispatcher


class Color(enum.Enum):
    RED = 1
    GREEN = 2
    BLUE = 3


class _Handlers:
    @staticmethod
    def handle_RED(x):
        return "red", x

    @staticmethod
    def handle_GREEN(x):
        return "green", x


def test_dispatch_by_member():
    dispatch = Dispatcher(Color, _Handlers)
    assert dispatch(Color.RED, 1) == ("red", 1)
    assert dispatch(Color.GREEN, 2) == ("green", 2)


def test_missing_handler():
    dispatch = Dispatcher(Color, _Handlers)
    assert not dispatch.handles(Color.BLUE)
    with pytest.raises(ValueError, match="No handler"):
        dispatch(Color.BLUE, 3)


def test_default_handler():
    dispatch = Dispatcher(Color, _Handlers, default_handler=lambda x: ("default", x))
    assert dispatch.handles(Color.BLUE)
    assert dispatch(Color.BLUE, 3) == ("default", 3)


def test_default_handler_method():
    class Handlers:
        @staticmethod
        def handle(x):
            return "any", x

        @staticmethod
        def handle_BLUE(x):
            return "blue", x

    dispatch = Dispatcher(Color, Handlers)
    assert dispatch(Color.RED, 0) == ("any", 0)
    assert dispatch(Color.BLUE, 0) == ("blue", 0)


def test_function_handler():
    dispatch = Dispatcher(Color, lambda x: x * 2)
    assert dispatch(Color.GREEN, 4) == 8


def test_misnamed_handler():
    class Handlers:
        @staticmethod
        def handle_PURPLE(x):
            return x

    with pytest.raises(ValueError, match="PURPLE"):
        Dispatcher(Color, Handlers)
