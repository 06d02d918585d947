import contextlib
import json
import os
import pathlib
import typing
import uuid
import zlib
from fractions import Fraction
from typing import IO, Union

import numpy
from cogent3.util.parallel import as_completed

PathType = Union[str, pathlib.Path, os.PathLike]


class BernsteinLiteError(ValueError):
    """base class for errors raised by bernstein_lite

    Notes
    -----
    Subclasses set ``module``, the ``code`` property combines that with the
    class name, e.g. ``params.Infeasible``.
    """

    module: str = "bernstein_lite"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


def _get_resource_dir() -> PathType:
    """returns path to resource directory"""
    if "BERNSTEINLITERC" in os.environ:
        path = os.environ["BERNSTEINLITERC"]
    else:
        from bernstein_lite import data

        path = pathlib.Path(data.__file__).parent

    path = pathlib.Path(path).expanduser().absolute()
    if not path.exists():
        raise ValueError(f"BERNSTEINLITERC directory {str(path)!r} does not exist")

    return pathlib.Path(path)


def get_resource_path(resource: PathType) -> PathType:
    path = BERNSTEINLITERC / resource
    assert path.exists()
    return path


# where the sample config lives
BERNSTEINLITERC = _get_resource_dir()


def stage_rng(seed: int, name: str) -> numpy.random.Generator:
    """returns an independent random generator for a named stage

    Parameters
    ----------
    seed
        the run seed
    name
        stage name, e.g. "synth" or "lower-k2"

    Notes
    -----
    The stream is seeded by [seed, crc32(name)], so stages never share draws
    and adding a stage does not perturb the others.
    """
    return numpy.random.default_rng([int(seed), zlib.crc32(name.encode("utf8"))])


@contextlib.contextmanager
def atomic_write(
    path: PathType,
    mode: str = "wb",
    encoding: typing.Optional[str] = None,
) -> typing.Iterator[IO]:
    """writes to a sibling temporary file, renamed onto path on success

    Outputs are either complete or absent.
    """
    path = pathlib.Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmppath = path.with_name(f".{uuid.uuid4().hex}{''.join(path.suffixes)}")
    try:
        with open(tmppath, mode, encoding=encoding) as out:
            yield out
        os.replace(tmppath, path)
    finally:
        tmppath.unlink(missing_ok=True)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, numpy.integer):
        return int(obj)
    if isinstance(obj, numpy.floating):
        return float(obj)
    if isinstance(obj, numpy.bool_):
        return bool(obj)
    if isinstance(obj, numpy.ndarray):
        return obj.tolist()
    if isinstance(obj, pathlib.Path):
        return str(obj)
    raise TypeError(f"{type(obj)} not json serialisable")


def to_json(data: dict) -> str:
    """deterministic json, sorted keys"""
    return json.dumps(data, sort_keys=True, indent=2, default=_jsonable)


def write_json(path: PathType, data: dict) -> pathlib.Path:
    path = pathlib.Path(path)
    with atomic_write(path, mode="w", encoding="utf8") as out:
        out.write(to_json(data))
        out.write("\n")
    return path


def rich_display(c3t, title_justify="left"):
    """converts a cogent3 Table to a Rich Table and displays it"""
    from rich.console import Console
    from rich.table import Table

    cols = c3t.columns
    columns = []
    for c in c3t.header:
        if tmplt := c3t._column_templates.get(c, None):
            col = [tmplt(v) for v in cols[c]]
        else:
            col = [str(v) for v in cols[c]]
        columns.append(col)

    rich_table = Table(
        title=c3t.title,
        highlight=True,
        title_justify=title_justify,
        title_style="bold blue",
    )
    for col in c3t.header:
        numeric_type = any(v in cols[col].dtype.name for v in ("int", "float"))
        j = "right" if numeric_type else "left"
        rich_table.add_column(col, justify=j, no_wrap=numeric_type)

    for row in zip(*columns):
        rich_table.add_row(*row)

    console = Console()
    console.print(rich_table)


def get_iterable_tasks(
    *,
    func: typing.Callable,
    series: typing.Sequence,
    max_workers: typing.Optional[int],
    **kwargs,
) -> typing.Iterator:
    if max_workers == 1:
        return map(func, series)
    else:
        return as_completed(func, series, max_workers=max_workers, **kwargs)
