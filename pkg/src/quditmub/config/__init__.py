# -*- coding: utf-8 -*-
# ---
# jupyter:
#   jupytext:
#     formats: py:percent,md:myst
#     notebook_metadata_filter: -jupytext.text_representation.jupytext_version
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python (quditmub-dev)
#     language: python
#     name: quditmub-dev
# ---

# %% [markdown] editable=true slideshow={"slide_type": ""}
# # Configuration options

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
import uuid
from pathlib import Path
from typing import Optional, Union

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from pydantic import validator
from valconfig import ValConfig


# %%
class Config(ValConfig):
    __default_config_path__   = "defaults.cfg"

    class tolerances:
        structural: float
        match: float
        residual: float
        mub: float
        trace_preserving: float

        @validator("structural", "match", "residual", "mub", "trace_preserving")
        def check_positive(cls, tol):
            if not 0 < tol < 1:
                raise ValueError(f"Tolerances must lie in (0, 1); received {tol}.")
            return tol

    class guards:
        """
        Upper bounds on the dimensions for which exhaustive searches are allowed.
        Exceeding them raises `ResourceLimitError`.
        """
        max_vanishing_dim: int
        max_knight_search_dim: int
        vanishing_chunk_size: int

    class random:
        default_seed: int

    class mp:
        max_cores: int
        chunk_size: int

        @validator("max_cores", "chunk_size")
        def check_at_least_one(cls, v):
            if v < 1:
                raise ValueError(f"Expected a value ≥ 1; received {v}.")
            return v

    class estimation:
        samples: int
        confidence_delta: float

    class caching:
        """
        Note that the `joblib` options are ignored when `use_disk_cache` is False.
        """
        use_disk_cache: bool=False

        class joblib:
            """
            these arguments are passed on to joblib.Memory.
            When `use_disk_cache` is False, functools.lru_cache is used instead of
            joblib.Memory, and the other config options are ignored.
            """
            location: Path=".joblib-cache"
            verbose : int=0
            backend : str="local"
            mmap_mode: Optional[str]=None
            compress: Union[bool,int]=False

            @validator("location")
            def make_location_unique(cls, location):
                """
                Add a machine-specific unique folder to the cache location,
                to avoid collisions with other machines.
                (Caches are pickled data, so not machine-portable.)
                """
                alphabet = "abcdefghijklmnopqrstuvwxyz"
                num = uuid.getnode()
                clst = []
                while num > 0:
                    clst.append(alphabet[num % 26])
                    num = num // 26
                hostdir = "host-"+"".join(clst)
                return location/hostdir


# %% editable=true slideshow={"slide_type": ""} tags=["skip-execution"]
config = Config()

# %% [markdown]
# # Default options
#
# These are stored in the text file `defaults.cfg`.
#
# ```{include} defaults.cfg
# :literal: true
# ```
