# Turn into a package so that we can add an "ignore_errors" rule to mypy's config.
# See: https://github.com/python/mypy/issues/4675#issuecomment-633571080
