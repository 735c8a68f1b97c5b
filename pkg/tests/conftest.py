import pathlib
import sys

import pytest

# the sources import each other by module name, as when run with python recovery/main.py
sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / 'recovery'))

from response_model import ResponseParams  # noqa: E402


@pytest.fixture
def finland_like():
    """
    Response parameters loosely shaped like the Finnish early-1990s recession
    """
    return ResponseParams(f=0.75, lambda_plus=0.0125, lambda_minus=-0.169, w0=100.0)


@pytest.fixture
def write_csv(tmp_path):
    def write(rows, name='series.csv', header='period,value'):
        path = tmp_path / name
        path.write_text(header + '\n' + ''.join(f'{period},{value}\n' for period, value in rows))
        return str(path)
    return write
