/** Anonymize & export: upload a CSV with a recipe, download the result. */

export function renderAnonymizeForm(): string {
  return (
    `<section class="anonymize">` +
    `<h2>Anonymize &amp; export</h2>` +
    `<form class="anonymize-form">` +
    `<label>CSV file <input type="file" name="file" accept=".csv" required></label>` +
    `<label>Delimiter <select name="delimiter"><option value=",">,</option><option value=";">;</option></select></label>` +
    `<label>Recipe (JSON)<textarea name="recipe" rows="8" spellcheck="false">` +
    `{\n  "technique": "mask",\n  "columns": ["name"]\n}</textarea></label>` +
    `<button type="submit">Anonymize</button>` +
    `</form>` +
    `<p class="anonymize-status" role="status"></p>` +
    `</section>`
  );
}
