"""
Utilidades para la generación del resumen PDF del pipeline.
"""
import math
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

import pandas as pd
from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.units import inch
from reportlab.pdfgen import canvas

logger = logging.getLogger(__name__)

ROWS_PER_PAGE = 25


def split_dataframe(df: pd.DataFrame, rows_per_page: int = ROWS_PER_PAGE) -> List[pd.DataFrame]:
    """Divide un DataFrame en bloques de rows_per_page filas."""
    num_chunks = max(1, math.ceil(len(df) / rows_per_page))
    return [df[i * rows_per_page:(i + 1) * rows_per_page] for i in range(num_chunks)]


def _status_color(value: Any):
    if value is True or str(value).lower() in ("true", "correcto"):
        return colors.green
    if value is False or str(value).lower() in ("false", "fallido"):
        return colors.red
    return colors.black


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def generar_pdf(sections: List[Dict[str, Any]], output_path: str,
                titulo: str = "Resumen de síntesis DOB") -> Optional[str]:
    """
    Genera el PDF del resumen con secciones clave-valor y tablas.

    Args:
        sections (List[Dict[str, Any]]): Secciones con "title" y "items" (dict) o "table" (DataFrame)
        output_path (str): Ruta del PDF
        titulo (str): Título del reporte

    Returns:
        Optional[str]: Ruta del PDF o None si hay error
    """
    if not sections:
        logger.warning("No hay secciones para generar el PDF")
        return None

    logger.info(f"Generando PDF con {len(sections)} secciones")

    try:
        c = canvas.Canvas(output_path, pagesize=letter)
        width, height = letter
        c.setTitle(titulo)
        c.setSubject("Síntesis de observadores de perturbación a partir de FRF")

        def header(continuation: bool = False):
            c.setFillColor(colors.black)
            c.setFont("Helvetica-Bold", 16)
            c.drawString(0.5 * inch, height - 1 * inch, f"{titulo} (Continuación)" if continuation else titulo)
            c.setFont("Helvetica", 10)
            if continuation:
                c.drawRightString(width - 0.5 * inch, height - 1 * inch, f"Página {c.getPageNumber()}")
            else:
                fecha_actual = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
                c.drawRightString(width - 0.5 * inch, height - 1 * inch, f"Fecha: {fecha_actual}")
            return height - 1.5 * inch

        def ensure_space(y: float, needed: float) -> float:
            if y - needed < 1 * inch:
                c.showPage()
                return header(continuation=True)
            return y

        y = header()
        for section in sections:
            y = ensure_space(y, 0.6 * inch)
            c.setFillColor(colors.darkblue)
            c.setFont("Helvetica-Bold", 12)
            c.drawString(0.5 * inch, y, section["title"])
            y -= 0.25 * inch
            c.setFillColor(colors.black)

            c.setFont("Helvetica", 10)
            for key, value in section.get("items", {}).items():
                y = ensure_space(y, 0.2 * inch)
                c.setFillColor(_status_color(value))
                c.drawString(0.75 * inch, y, f"{key}: {_format(value)}")
                c.setFillColor(colors.black)
                y -= 0.2 * inch

            table = section.get("table")
            if table is not None and not table.empty:
                columns = list(table.columns)
                col_width = (width - 1.25 * inch) / len(columns)
                for chunk in split_dataframe(table):
                    y = ensure_space(y, 0.4 * inch)
                    c.setFont("Helvetica-Bold", 9)
                    for i, column in enumerate(columns):
                        c.drawString(0.75 * inch + i * col_width, y, str(column)[:18])
                    y -= 0.18 * inch
                    c.setFont("Helvetica", 9)
                    for row in chunk.itertuples(index=False):
                        y = ensure_space(y, 0.18 * inch)
                        for i, value in enumerate(row):
                            c.drawString(0.75 * inch + i * col_width, y, _format(value)[:18])
                        y -= 0.18 * inch

            c.setStrokeColor(colors.lightgrey)
            c.line(0.5 * inch, y - 0.05 * inch, width - 0.5 * inch, y - 0.05 * inch)
            y -= 0.3 * inch

        c.setFont("Helvetica-Oblique", 8)
        c.drawString(0.5 * inch, 0.5 * inch, "Generado por el pipeline de síntesis DOB")
        c.save()

        logger.info(f"PDF generado correctamente: {output_path}")
        return output_path

    except Exception as e:
        logger.error(f"Error generando PDF: {e}", exc_info=True)
        return None
