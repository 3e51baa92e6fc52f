# -*- coding: utf-8 -*-
"""
English stop words removed from release notes before stemming.

Changing the list changes vocabularies and therefore persisted models, so
bump STOPWORDS_VERSION whenever it is edited.
"""
from typing import FrozenSet

STOPWORDS_VERSION = "1"

ENGLISH_STOPWORDS: FrozenSet[str] = frozenset(
    """
    a about above after again against all also am an and any are aren as at
    be because been before being below between both but by
    can cannot could couldn
    did didn do does doesn doing don down during
    each either etc
    few for from further
    get gets got
    had hadn has hasn have haven having he her here hers herself him himself
    his how
    i if in into is isn it its itself
    just
    let ll
    me more most much must mustn my myself
    no nor not now
    of off on once only or other our ours ourselves out over own
    re
    same shan she should shouldn so some such
    than that the their theirs them themselves then there these they this
    those through to too
    under until up us
    ve very via
    was wasn we were weren what when where which while who whom why will with
    won would wouldn
    you your yours yourself yourselves
    """.split()
)
