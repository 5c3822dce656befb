# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(0, os.path.abspath('../..'))


# -- Project information -----------------------------------------------------

project = 'lingan'
copyright = '2026, lingan developers'
author = 'lingan developers'

version = '0.1'
release = '0.1.0'


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = []

## docs build without torch installed
autodoc_mock_imports = ['torch']


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_static_path = ['_static']
htmlhelp_basename = 'lingandoc'
html_show_sourcelink = False


# -- Options for LaTeX / man output ------------------------------------------

latex_documents = [
    (master_doc, 'lingan.tex', 'lingan Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'lingan', 'lingan Documentation', [author], 1)
]
