import enum
import types
from typing import Any, Callable, Dict, Generic, Optional, Type, TypeVar, cast

from typing_extensions import ParamSpec

_Params = ParamSpec("_Params")
_Return = TypeVar("_Return")


class Dispatcher(Generic[_Params, _Return]):
    """
    A dispatcher that maps a call to a group of functions
    based on a member of an enumeration.

    ``handler_obj`` can be either a function with the signature::

        def handler(*args, **kwds)

    or a class with the static methods::

        @staticmethod
        def handle_<name>(*args, **kwds)

    where ``<name>`` is the name of the enum member that this function will handle
    (e.g., ``handle_Wbar`` for ``OperatorKind.Wbar``).
    The class can also define the default handler::

        @staticmethod
        def handle(*args, **kwds)

    If it is not defined, the ``default_handler`` value will be used.
    A handler named after a nonexistent member raises ``ValueError`` on construction;
    dispatching a member with no handler and no default raises ``ValueError`` on call.
    """

    def __init__(
        self,
        tags: Type[enum.Enum],
        handler_obj: Any,
        default_handler: Optional[Callable[_Params, _Return]] = None,
    ):
        self._tags = tags
        self._handlers: Dict[enum.Enum, Callable[_Params, _Return]] = {}
        self._default_handler: Optional[Callable[_Params, _Return]]

        if isinstance(handler_obj, types.FunctionType):
            self._default_handler = cast(Callable[_Params, _Return], handler_obj)
            return

        handler_prefix = "handle"
        if hasattr(handler_obj, handler_prefix):
            self._default_handler = getattr(handler_obj, handler_prefix)
        else:
            self._default_handler = default_handler

        attr_prefix = handler_prefix + "_"
        for attr in vars(handler_obj):
            if attr.startswith(attr_prefix):
                name = attr[len(attr_prefix) :]
                if name not in tags.__members__:
                    raise ValueError(
                        f"{handler_obj.__name__}.{attr} does not match "
                        f"any member of {tags.__name__}"
                    )
                self._handlers[tags[name]] = getattr(handler_obj, attr)

    def handles(self, tag: enum.Enum) -> bool:
        return tag in self._handlers or self._default_handler is not None

    def __call__(self, tag: enum.Enum, *args: _Params.args, **kwargs: _Params.kwargs) -> _Return:
        handler = self._handlers.get(tag, self._default_handler)
        if handler is None:
            raise ValueError(f"No handler for {tag!r}")
        return handler(*args, **kwargs)
