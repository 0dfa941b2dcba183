import pytest
from fastapi.testclient import TestClient

from model_service import ServiceConfig, create_app


@pytest.fixture()
def client():
    app = create_app(ServiceConfig(top_k_cap=5, batch_cap=4))
    with TestClient(app) as c:
        yield c
