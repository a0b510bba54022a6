"""Repository-root conftest so `refertriage` and `pipelines` import from the checkout."""
