import os

_release = {}
exec(
    compile(
        open("../python/gridtree-core/gridtree_core/_version.py").read(),
        "../python/gridtree-core/gridtree_core/_version.py",
        "exec",
    ),
    _release,
)

on_rtd = os.environ.get("READTHEDOCS", None) == "True"

html_theme = "pydata_sphinx_theme"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.napoleon",
    "myst_parser",
]

source_suffix = ".md"
master_doc = "index"
project = "gridtree"
copyright = "2024, gridtree contributors"
author = "gridtree contributors"
version = _release["__version__"]
release = _release["__version__"]
language = "en"

exclude_patterns = []
highlight_language = "python"
pygments_style = "sphinx"
todo_include_todos = False
htmlhelp_basename = "gridtreedoc"

intersphinx_mapping = {"python": ("https://docs.python.org/3", None)}
