import hashlib
import itertools
import os

from jinja2 import Environment, PackageLoader

_templates = Environment(
    loader=PackageLoader('qwe', 'templates'),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def render_template(template_name, **context):
    """Render one of the package templates (DOT graphs, SMT-LIB scripts)."""
    return _templates.get_template(template_name).render(**context)


def generate_safe_filename(label, extension, index=None):
    """Generate a stable file name for an artifact from its label.

    Args:
        label: free text identifying the artifact (e.g. a skeleton description)
        extension: file extension including the dot
        index: optional sequence number placed in front of the hash

    Returns:
        A file name made of the index and a short hash of the label
    """
    hashed_name = hashlib.md5(label.encode('utf-8')).hexdigest()[:12]
    if index is not None:
        return f"{index:05d}-{hashed_name}{extension}"
    return f"{hashed_name}{extension}"


def words(alphabet, length):
    """All words of exactly the given length, in lexicographic order."""
    for letters in itertools.product(sorted(alphabet), repeat=length):
        yield ''.join(letters)


def words_upto(alphabet, bound):
    """All words up to the given length, shortest first."""
    for length in range(bound + 1):
        yield from words(alphabet, length)


def ensure_directory(path):
    os.makedirs(path, exist_ok=True)
    return path
