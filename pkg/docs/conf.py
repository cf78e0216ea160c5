#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# critbubble documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import critbubble

# -- General configuration ------------------------------------------------

needs_sphinx = "1.4.5"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
    "sphinx.ext.coverage",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
]

templates_path = ["_templates"]

source_suffix = ".rst"

master_doc = "index"

project = "critbubble"
copyright = "2026, the critbubble developers"
author = "the critbubble developers"

verinfo = critbubble.__version__
version = verinfo.split("+")[0]
release = verinfo

language = None

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

pygments_style = "friendly"
pygments_dark_style = "monokai"

todo_include_todos = False


# -- Options for HTML output ----------------------------------------------

html_theme = "furo"

html_static_path = ["_static"]

smart_quotes = True

htmlhelp_basename = "critbubbledoc"


# -- Options for manual page output ---------------------------------------

man_pages = [(master_doc, "critbubble", "critbubble Documentation", [author], 1)]


# -- Options for intersphinx -------------------------------------------------

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}
