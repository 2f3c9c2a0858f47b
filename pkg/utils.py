import re
import sys
import time
from contextlib import contextmanager

TERMINATOR = 0
TERMINATOR_TOKEN = "$"

_ESCAPE = re.compile(r"^\\x([0-9A-Fa-f]{2})$")


def ceil_div(a, b):
    """
    Ceiling division for non-negative integers.

    Args:
        a (int): Dividend
        b (int): Positive divisor

    Returns:
        int: ceil(a / b)
    """
    return -(-a // b)


def parse_symbol_token(token):
    """
    Convert a text-format symbol token into its byte code.

    Args:
        token (str): "$", a single printable character, or a "\\xHH" escape

    Returns:
        int: Byte code in [0, 256), the terminator being 0

    Raises:
        ValueError: If the token is not recognised
    """
    if token == TERMINATOR_TOKEN:
        return TERMINATOR

    match = _ESCAPE.match(token)
    if match:
        return int(match.group(1), 16)

    if len(token) == 1 and token.isprintable() and not token.isspace():
        code = ord(token)
        if code < 256:
            return code
    raise ValueError(f"bad symbol token '{token}'")


def format_symbol_token(code):
    """
    Convert a byte code into the token the text format writes for it.

    Args:
        code (int): Byte code

    Returns:
        str: Token that parse_symbol_token maps back to `code`
    """
    if code == TERMINATOR:
        return TERMINATOR_TOKEN
    char = chr(code)
    if 33 <= code < 127 and char != TERMINATOR_TOKEN:
        return char
    return f"\\x{code:02x}"


def peak_memory_mib():
    """
    Best-effort peak resident memory of this process.

    Returns:
        float: Peak memory in MiB, or None where the platform does not report it
    """
    try:
        import resource
    except ImportError:
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # ru_maxrss is bytes on macOS, KiB elsewhere
    if sys.platform == "darwin":
        return peak / (1024 * 1024)
    return peak / 1024


@contextmanager
def stopwatch():
    """
    Time a block of code.

    Yields:
        dict: Filled with 'seconds' when the block exits
    """
    timing = {}
    start = time.perf_counter()
    try:
        yield timing
    finally:
        timing["seconds"] = time.perf_counter() - start
