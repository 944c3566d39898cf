# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

import os
import sys
sys.path.insert(0, os.path.abspath('../'))

# -- General configuration ---------------------------------------------------

extensions = ['sphinx.ext.autodoc',
    'sphinx.ext.todo',
    'sphinx.ext.viewcode',
              'sphinx.ext.intersphinx']

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'rustico'
copyright = u'2019, rustico developers'
author = u'rustico developers'

version = u'0.1.0'
release = u'0.1.0'

language = None

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'

todo_include_todos = True

# -- Options for HTML output -------------------------------------------------

html_theme = "classic"

html_theme_path = []

html_static_path = []

htmlhelp_basename = 'rusticodoc'

# -- Options for LaTeX / manual page / Texinfo output ------------------------

latex_documents = [
    (master_doc, 'rustico.tex', u'rustico Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'rustico', u'rustico Documentation',
     [author], 1)
]

texinfo_documents = [
    (master_doc, 'rustico', u'rustico Documentation',
     author, 'rustico', 'Delineation of curvilinear structures with push-pull inhibited COSFIRE filters.',
     'Miscellaneous'),
]


def keep_private_helpers(app, what, name, obj, skip, options):
    # document __init__ and the single underscore helpers
    if name == "__init__" or (name.startswith('_') and not name.startswith('__')):
        return False
    return skip


def setup(app):
    app.connect("autodoc-skip-member", keep_private_helpers)
