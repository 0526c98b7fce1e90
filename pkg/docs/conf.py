# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

# -- Path setup --------------------------------------------------------------

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

# -- Project information -----------------------------------------------------

project = "adafe"
copyright = "2026, adafe developers"
author = "adafe developers"

# The short X.Y version
version = "0.1"
# The full version, including alpha/beta/rc tags
release = "0.1.0"

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.napoleon",
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"
language = None
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
pygments_style = None

# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]
htmlhelp_basename = "adafedoc"

# -- Options for LaTeX output ------------------------------------------------

latex_documents = [
    (master_doc, "adafe.tex", "adafe Documentation", "adafe developers", "manual"),
]

# -- Options for manual page output ------------------------------------------

man_pages = [(master_doc, "adafe", "adafe Documentation", [author], 1)]

autodoc_member_order = "bysource"
