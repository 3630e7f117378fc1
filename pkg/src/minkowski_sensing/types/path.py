from pathlib import Path
from typing import Union
from pydantic import AfterValidator
from typing_extensions import Annotated
from cloudpathlib import AnyPath, CloudPath


def expand_paths(value: Union[str, Path, CloudPath]) -> Union[Path, CloudPath]:
    """Convert strings to AnyPath objects; local paths get `~` expanded."""
    if isinstance(value, str):
        value = AnyPath(value)
    if isinstance(value, Path):
        value = value.expanduser()
    return value


ExpandedPath = Annotated[Union[str, Path, CloudPath], AfterValidator(expand_paths)]
